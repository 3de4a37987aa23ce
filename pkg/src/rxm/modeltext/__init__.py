"""Textual model and script formats: parsing and canonical serialization."""

from .parser import (
    ParseError,
    ParseFailure,
    parse_files,
    parse_model,
    parse_script,
    try_parse_model,
    try_parse_script,
)
from .serializer import serialize_model, serialize_script

__all__ = [
    "ParseError",
    "ParseFailure",
    "parse_files",
    "parse_model",
    "parse_script",
    "try_parse_model",
    "try_parse_script",
    "serialize_model",
    "serialize_script",
]
