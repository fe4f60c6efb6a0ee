"""
Utils package for logging and deterministic parallel helpers.
"""
