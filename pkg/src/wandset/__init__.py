"""Finite-fragment engine for wand/set universes.

Build stage-generated universe fragments from pluggable wand specifications,
encode them canonically as pure sets, and check the structural laws, the
synonymy witnesses, and the interpretation translations at desk scale.
"""

__version__ = "0.1.0"
