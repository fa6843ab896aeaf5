"""
Main entry point for smoothcert from a source checkout.
Equivalent to the installed `smoothcert` console script.
"""

import sys
from pathlib import Path

package_dir = Path(__file__).parent / "smoothcert"
sys.path.insert(0, str(package_dir.parent))

from smoothcert.main import main


if __name__ == "__main__":
    sys.exit(main())
