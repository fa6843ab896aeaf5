"""Main entry point for smoothcert."""

import sys
import logging
from pathlib import Path
from datetime import datetime
from typing import List, Optional

# Add parent directory to path if running directly
# This allows: python3 /path/to/smoothcert/main.py
if __name__ == "__main__":
    package_parent = Path(__file__).parent.parent
    if str(package_parent) not in sys.path:
        sys.path.insert(0, str(package_parent))

from smoothcert.cli import build_parser, run
from smoothcert.config import Config


def setup_logging(level: str = "INFO", log_file: Optional[Path] = None):
    """Log to ~/.smoothcert/smoothcert.log and stderr; stdout carries results only."""
    if log_file is None:
        log_file = Path.home() / ".smoothcert" / "smoothcert.log"
    log_file.parent.mkdir(parents=True, exist_ok=True)

    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s [%(levelname)s] %(name)s:%(funcName)s:%(lineno)d - %(message)s',
        handlers=[
            logging.FileHandler(log_file, mode='a', encoding='utf-8'),
            logging.StreamHandler(sys.stderr)
        ],
        force=True,
    )

    logger = logging.getLogger(__name__)
    logger.info("=" * 80)
    logger.info(f"smoothcert started at {datetime.now()}")
    logger.info(f"Python version: {sys.version}")
    logger.info(f"Log file: {log_file}")
    logger.info("=" * 80)

    return logger


def excepthook(exc_type, exc_value, exc_tb):
    """Global exception handler to catch unhandled exceptions."""
    logger = logging.getLogger(__name__)
    logger.critical("Unhandled exception occurred!", exc_info=(exc_type, exc_value, exc_tb))
    sys.__excepthook__(exc_type, exc_value, exc_tb)


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, set up logging and run the command."""
    args = build_parser().parse_args(argv)
    config = Config()
    logger = setup_logging(args.log_level or config.log_level, config.get_log_path())

    sys.excepthook = excepthook

    logger.info(f"Command: {args.command}")
    code = run(args, config)
    logger.info(f"Command {args.command} finished with exit code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
