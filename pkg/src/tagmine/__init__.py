"""
tagmine: from image-text corpora to tag vocabularies, tagging losses, evaluation and
tag-guided retrieval.
"""

__version__ = "0.1.0"
