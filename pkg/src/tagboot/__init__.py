"""tagboot: bootstrap a POS-tagged corpus for a low-resource language.

The pipeline projects source-language tags onto a verse-aligned target text
through word alignments, then iteratively cleans the projected tags and
translates them into the target tagset with a transformation-based learner,
growing a human-corrected (or simulated) gold slice between iterations.
"""

__version__ = "0.1.0"
