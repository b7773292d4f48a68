import os
import sys

# Works from any cwd: the package sits next to this script
SCRIPT_DIR = os.path.dirname(os.path.abspath(__file__))


def main() -> int:
    sys.path.insert(0, SCRIPT_DIR)
    os.environ.setdefault("PYTHONIOENCODING", "utf-8")

    from bbm_lab.cli import main as cli_main

    # no arguments: full sweep with defaults
    return cli_main(sys.argv[1:] or ["all"])


if __name__ == "__main__":
    sys.exit(main())
