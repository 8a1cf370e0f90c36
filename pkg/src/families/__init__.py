# Empty init file for families package
