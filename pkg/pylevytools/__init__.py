import logging
logging.basicConfig(level=logging.INFO, format='%(message)s')
logger = logging.getLogger(__name__)

__version__ = "0.1.0"


def get_default_logger():
    return logger
