"""
Utilities Package
=================

- fixtures: loading and repairing the transcribed device fixtures
"""

from app.utils.fixtures import (
    fixture_path,
    load_element,
    load_fixture,
    load_local_unitary,
    load_parameters,
    load_povm
)

__all__ = [
    "fixture_path",
    "load_element",
    "load_fixture",
    "load_local_unitary",
    "load_parameters",
    "load_povm",
]
