# Empty initialization module for Pytest
# This enables the detection of the tests package
