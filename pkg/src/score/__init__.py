# Digit-grid score values
