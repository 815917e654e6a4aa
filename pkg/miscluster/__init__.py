"""miscluster - Mutual Information Scoring clustering for categorical data"""
from loguru import logger

__version__ = "0.1.0"

# silent as a library until configure_logging is called
logger.disable("miscluster")
