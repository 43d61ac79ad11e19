# Command line entry points
