# <p>To be eligible you must have left your country and be unable to go back because you fear persecution.</p>

if var_1
    var_2 = True