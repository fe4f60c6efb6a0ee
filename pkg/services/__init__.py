"""
Services package: one service per verification module plus configuration, errors and reports.
"""
