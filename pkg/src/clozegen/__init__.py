"""Multiple-choice cloze vocabulary question generation toolkit."""

__version__ = "0.1.0"
