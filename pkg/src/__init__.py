# HPDS tensor model reduction toolkit
__version__ = "1.0.0"
