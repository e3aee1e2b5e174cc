import shlex
import sys

from src.cli.shell import CausalCLI


def command_line(argv):
    """One shell command from argv; subcommand hyphens become underscores."""
    name, *rest = argv
    return ' '.join([name.replace('-', '_')] + [shlex.quote(arg) for arg in rest])


if __name__ == '__main__':
    cli = CausalCLI()
    if len(sys.argv) > 1:
        cli.onecmd_plus_hooks(command_line(sys.argv[1:]))
        sys.exit(cli.exit_code)
    try:
        cli.cmdloop()
    except KeyboardInterrupt:
        print("\nShutting down...")
