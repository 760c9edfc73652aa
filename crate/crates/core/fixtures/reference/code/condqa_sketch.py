# Question: My husband passed away last month. We were married for 10 years and he paid National Insurance contributions. Can I get Bereavement Support Payment?

husband_pass_away = True
married_to_deceased = True
husband_paid_national_insurance = True
can_get_bereavement_support_payment = None # This is the variable that answers the question

# <h1>Eligibility</h1>

# <p>You may be able to get Bereavement Support Payment if your husband, wife or civil partner died.</p>

if husband_pass_away and married_to_deceased:
    may_get_benefits = True

# <p>You must have been married or in a civil partnership when they died and they must have paid National Insurance contributions for at least 25 weeks.</p>

if may_get_benefits and husband_paid_national_insurance:
    can_get_bereavement_support_payment = True