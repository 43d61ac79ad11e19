# Attribute-weighted composite scores
