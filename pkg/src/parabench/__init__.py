"""Malayalam paraphrase-generation workbench.

Four pivot-translation pipelines over pluggable model backends, from-scratch
BLEU/METEOR/cosine metrics, a human-judgment annotation service, and report
tooling that puts automated scores next to human verdicts.
"""

__version__ = "0.1.0"
