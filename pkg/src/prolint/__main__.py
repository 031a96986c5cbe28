"""The `python -m prolint` entrypoint."""

from prolint._cli import main

if __name__ == "__main__":  # pragma: no cover
    main()
