# Tests package for autoansatz
