"""Private capacity analysis for quantum keyless private communication."""

__version__ = "0.1.0"


def main() -> None:
    from qkpc.cli import main as cli_main

    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
