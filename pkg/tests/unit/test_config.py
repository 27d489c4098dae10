import logging
import os
import sys
import tempfile
import unittest
from logging.handlers import RotatingFileHandler

# Add the repository root to the path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from kiteratio import config


class TestSetupLogging(unittest.TestCase):
    """Tests for logging configuration"""

    def tearDown(self):
        logger = config.setup_logging("WARNING")
        for handler in list(config._handlers_installed):
            logger.removeHandler(handler)
            handler.close()
        config._handlers_installed.clear()

    def test_repeated_calls_do_not_stack_handlers(self):
        logger = config.setup_logging("INFO")
        config.setup_logging("INFO")
        installed = [h for h in logger.handlers if h in config._handlers_installed]
        self.assertEqual(len(installed), 1)
        self.assertEqual(logger.level, logging.INFO)

    def test_rotating_file_handler(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "kiteratio.log")
            logger = config.setup_logging("debug", path)
            file_handlers = [h for h in logger.handlers if isinstance(h, RotatingFileHandler)]
            self.assertEqual(len(file_handlers), 1)
            self.assertEqual(file_handlers[0].maxBytes, 5 * 1024 * 1024)
            logging.getLogger('kiteratio.test').debug("written to file")
            file_handlers[0].flush()
            with open(path, encoding="utf-8") as f:
                self.assertIn("written to file", f.read())
            config.setup_logging("WARNING")

    def test_child_loggers_propagate(self):
        config.setup_logging("INFO")
        with self.assertLogs('kiteratio.spectral', level='INFO') as ctx:
            logging.getLogger('kiteratio.spectral').info("hello")
        self.assertIn("hello", ctx.output[0])


class TestSettings(unittest.TestCase):
    """Tests for environment-driven defaults"""

    def test_defaults_are_sane(self):
        self.assertGreater(config.PERRON_TOL, 0)
        self.assertGreaterEqual(config.THREADS, 1)
        self.assertGreater(config.PRECISION_BITS, 53)
        self.assertEqual(config.TIE_TOL, 1e-9)

    def test_memory_usage(self):
        self.assertGreater(config.memory_usage_mb(), 0.0)


if __name__ == '__main__':
    unittest.main()
