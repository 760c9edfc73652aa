# <p>You can apply to become the estate’s administrator if you are 18 or over and you are the most ‘entitled’ inheritor of the deceased’s estate. This is usually the deceased’s closest living relative.</p>

if applicant_age >= 18 and entitled_inheritor and closest_relative:
    can_apply_estate_administrator = True