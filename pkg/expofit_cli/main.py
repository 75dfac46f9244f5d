"""
Main entry point for the expofit command line.
"""

import sys
from typing import List, Optional

import click

from .cli.main import cli, console
from .core.errors import ExpofitError


def run(argv: Optional[List[str]] = None) -> int:
    """
    Run the CLI and translate failures into exit codes.

    Returns:
        int: 0 on success, 2 for input or usage errors, 3 for numerical failures
    """
    try:
        code = cli.main(args=argv, prog_name="expofit", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        console.print("Aborted.")
        return 1
    except ExpofitError as e:
        console.print(f"❌ [red]Error: {e}[/red]")
        return getattr(e, "exit_code", 1)
    return code if isinstance(code, int) else 0


def main() -> int:
    return run()


if __name__ == "__main__":
    sys.exit(main())
