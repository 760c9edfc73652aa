# A few players are playing a boardgame

# The rules of the game are as follows

# Rule1: If the amberjack has difficulty to find food, then the amberjack removes from the board one of the pieces of the carp.

rule1() = difficulty_finding_food(amberjack) => remove_piece(amberjack, carp)



# The current state of the game is as follows

# The amberjack struggles to find food.

difficulty_finding_food(amberjack) = True



# Based on the game state and the rules and preferences, does the amberjack remove from the board one of the pieces of the carp?

question = remove_piece(amberjack, carp)