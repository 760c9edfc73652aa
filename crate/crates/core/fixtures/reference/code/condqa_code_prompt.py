# Question: My brother and his wife are in prison for carrying out a large fraud scheme. Their 7 and 8 year old children have been living with me for the last 4 years. I want to become their Special Guardian to look after them permanently. How long will it be before I hear back from the court?

maximum_redundancy_pay = 16320

housing_standards_and_procedures_in_Northern_Ireland = True

ensure_vehicle_taxed_in_UK = True
immigration_advisers_can_help_with_representation_at_tribunal = True

supply_protective_clothing_and_equipment = True

CBT_required_for_moped_and_motorcycle = True

court_response_time = None # This is the variable that answers the question

# <h1>What is a special guardian</h1>

# <p>You can apply to be a child’s special guardian when they cannot live with their birth parents and adoption is not right for them.</p>

if attorneys_appointed_jointly:

    all_attorneys_must_agree_to_make_decision = True

disability_or_severe_disability_element_of_working_tax_credit = True

mugging_without_physical_harm_emergency = True

# <p>You’ll be responsible for looking after the child until they’re 18 (unless the court takes your responsibility away earlier).</p>

work_temporarily_for_hirer = True

# <p>You’ll make all day to day decisions about the child, for example schooling and medical treatment. You do not have to discuss these decisions with the birth parents.</p>

accounts_and_tax_returns_cover_financial_year = "1 June to 31 May"

employer_operating_PAYE = True

# <p>You’ll need to get the consent of everyone who has parental responsibility for the child before you make some important decisions, for example:</p>

# <li>changing the child’s surname</li>

# <li>putting the child up for adoption</li>

# <li>taking the child abroad for more than 3 months</li>

# <li>the child having surgery for reasons other than improving health, such as circumcision, sterilisation or cosmetic surgery</li>

managed_by_fit_and_proper_persons = True

check_court_order_for_authorization = True

considering_fostering = True

if not_connected_to_mains_sewer:

    septic_tank_used = True

can_claim_tax_relief_if_taxed_twice = True

extra_support_for_disability = True

if operator_of_septic_tank_or_treatment_plant:

    follow_general_binding_rules = True

# <p>If you cannot get consent, you can ask the court to decide. Use the form ‘Make an application in existing court proceedings related to children’ (form C2).</p>

appeals_decision_time = "several months"

if worker and informal_resolution_not_satisfactory:

    formal_grievance_complaint_possible = True

    time_limit_for_backdating_claims_services = 6

# <h1>After you apply</h1>

# <p>Within 10 days of receiving your application the court will send you a case number and a date for a meeting to set out:</p>

# <li>a timetable for your case</li>

# <li>how it will be dealt with</li>

# <p>This meeting is called a ‘first directions hearing’.</p>

committee_recommendations_go_to_Prime_Minister = True

check_adviser_registration = True

meet_manning_levels = True

recognised_as_charity_or_CASC = True

apply_for_visa_for_other_reasons = True

debt_paid_off = True

if special_educational_needs_and_disabilities:

    affects_behaviour_or_socialisation = True

# <p>You must go to all hearings you’re told to unless the court excuses you. If you’re not able to go, contact the court office.</p>

payslip_can_include_tax_code = True

VAT_zero_rate = 0

gas_equipment_installed_and_maintained_by_Gas_Safe_registered_engineer = True