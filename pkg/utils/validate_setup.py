"""
Validate project setup: Python version, dependencies, output directory, optional run config.
"""

import os
import sys

from dotenv import load_dotenv


def check_setup(config_path=None):
    """Check if the project is set up correctly."""
    print("Checking project setup...\n")
    issues = []

    if sys.version_info < (3, 9):
        issues.append("Python 3.9+ required (current: {}.{})".format(
            sys.version_info.major, sys.version_info.minor))
    else:
        print("✓ Python {}.{}.{}".format(
            sys.version_info.major, sys.version_info.minor, sys.version_info.micro))

    required = ["numpy", "scipy", "pandas", "pydantic", "rich", "dotenv", "pytest"]
    for name in required:
        try:
            __import__(name)
            print("✓ {} installed".format(name))
        except ImportError:
            issues.append("Missing package: {}".format(name))

    load_dotenv()
    out_dir = os.getenv("MUSIC_DYNAMICS_OUTPUT_DIR")
    if out_dir:
        print("✓ MUSIC_DYNAMICS_OUTPUT_DIR = {}".format(out_dir))
        try:
            os.makedirs(out_dir, exist_ok=True)
        except OSError as e:
            issues.append("Cannot create output directory {}: {}".format(out_dir, e))
    else:
        print("• MUSIC_DYNAMICS_OUTPUT_DIR not set (config output_dir is used)")

    if config_path:
        sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))
        from core.errors import ConfigError
        from core.schema.run_config import validate_config

        try:
            config = validate_config(config_path)
            print("✓ {} is valid (manifest: {})".format(config_path, config.manifest))
        except ConfigError as e:
            issues.append("Invalid config {}: {}".format(config_path, e))

    print("\n" + "=" * 50)
    if issues:
        print("❌ Setup issues:")
        for i in issues:
            print("  • {}".format(i))
        print("\nFix: pip install -r requirements.txt")
        return False
    print("✓ Setup OK. Run: python demos/analysis_cli.py run-all --config <run.json>")
    return True


if __name__ == "__main__":
    success = check_setup(sys.argv[1] if len(sys.argv) > 1 else None)
    sys.exit(0 if success else 1)
