# <p>To be eligible you must have left your country and be unable to go back because you fear persecution.</p>

if value_of_property_gone_down_by_more_than_50:
    eligible_to_claim = True
    getting_housing_benefit = True