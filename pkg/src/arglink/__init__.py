"""Document-level event argument linking.

Span-selection model that links each (event, role) pair to its explicit
argument span in a multi-sentence window, or to the no-argument outcome
when none is attested.
"""

__version__ = "0.1.0"
