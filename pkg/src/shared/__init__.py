# Shared config, logging, metrics, errors and record I/O
