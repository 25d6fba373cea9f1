import os
from dotenv import load_dotenv

load_dotenv()

class Config:
    """Base configuration."""
    TOOL_VERSION = '1.0.0'

    # Paths
    OUTPUT_ROOT = os.getenv('FEDSIM_OUTPUT_ROOT', './runs')
    DATA_DIR = os.getenv('FEDSIM_DATA_DIR', './data')

    # Logging
    LOG_LEVEL = os.getenv('FEDSIM_LOG_LEVEL', 'INFO')
    LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

    # Experiments
    DEFAULT_SEED = int(os.getenv('FEDSIM_DEFAULT_SEED', 0))
    RANDOM_REPLICATION_SIZES = (1, 2, 3, 4, 7, 9)
    CONCENTRATION_FRACTIONS = (0.05, 0.10, 0.25, 0.50, 1.0)

    # Uptime analytics
    PROBE_INTERVAL = int(os.getenv('FEDSIM_PROBE_INTERVAL', 300))
    MAX_TIMELINE_PROBES = int(os.getenv('FEDSIM_MAX_TIMELINE_PROBES', 1_000_000))
    AS_OUTAGE_MIN_INSTANCES = int(os.getenv('FEDSIM_AS_OUTAGE_MIN_INSTANCES', 8))
    IMPACT_PERCENTILE = 95
    TOOT_BINS = (10_000, 100_000, 1_000_000)

class DevelopmentConfig(Config):
    """Development configuration."""
    DEBUG = True
    TESTING = False
    LOG_LEVEL = os.getenv('FEDSIM_LOG_LEVEL', 'DEBUG')

class ProductionConfig(Config):
    """Production configuration."""
    DEBUG = False
    TESTING = False

class TestingConfig(Config):
    """Testing configuration."""
    DEBUG = True
    TESTING = True
    LOG_LEVEL = 'WARNING'
    OUTPUT_ROOT = os.getenv('FEDSIM_TEST_OUTPUT_ROOT', './.test-runs')

config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}
