# Record schemas for every file format the toolkit reads or writes
