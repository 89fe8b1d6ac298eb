"""Allow running as python -m subtree_bounds."""

from .main import run

if __name__ == "__main__":
    run()
