# Rivlin cube toolkit package
