# <p>To be eligible you must have left your country and be unable to go back because you fear persecution.</p>

if left_country_and_fear_persecution:
    eligible_for_asylum = True