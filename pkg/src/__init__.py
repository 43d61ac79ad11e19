# Digit-grid scoring toolkit
