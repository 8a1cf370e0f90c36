# Empty init file for neuralop package
