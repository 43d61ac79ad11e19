# Correlation, attribute coding and sorting-trial metrics
