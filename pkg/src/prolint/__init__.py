"""The `prolint` APIs: a lossless Prolog parser, linter, formatter and corpus analyzer."""

__version__ = "0.1.0"
