"""Entry point for ``python -m cqmine``."""

from .cli import main

raise SystemExit(main())
