# Question:
# The item is not equipment for audio books or newspapers, and I'm not selling lifeboats or anything related to that. It's for medicine and medicinal ingredients. Can I apply zero VAT to this item?

equipment_for_audio_books_or_newspapers = False

selling_lifeboats_or_related_equipment = False

selling_medicine_or_ingredients_for_medicine = True

can_apply_zero_VAT = None # This is the variable that answers the question.


# Other variables needed for the document:

# Document:

## Items that qualify for the zero rate

# You may be able to apply zero VAT when you sell the following to an eligible charity:

# * equipment for making ‘talking’ books and newspapers

if equipment_for_audio_books_or_newspapers:

    can_apply_zero_VAT = False

# * lifeboats and associated equipment, including fuel

if selling_lifeboats_or_related_equipment:

    can_apply_zero_VAT = False

# * medicine or ingredients for medicine

if selling_medicine_or_ingredients_for_medicine:

    can_apply_zero_VAT = True

# * resuscitation training models

resuscitation_training_models = None