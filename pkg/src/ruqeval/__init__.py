"""ruqeval: evaluation and study-analysis toolkit for RUQ ultrasound report generation.

Subpackage map:

- ``textproc``: normalization, tokenization, stemming, n-grams, LCS
- ``nlg``: BLEU, ROUGE-1, ROUGE-L, METEOR
- ``forte``: keyword-lexicon scoring over clinical synonym groups
- ``claims``: claim extraction/verification and claim precision
- ``labels``: diagnostic label extraction, prevalence filtering, cohort rules,
  decision-prompt construction
- ``cine``: cine-loop frame sampling and spatial standardization
- ``trainmath``: training-time math kernels (loss, gradient surgery, mixup,
  reweighting, pooling, threshold fitting)
- ``stats``: ranking metrics, correlation, bootstrap intervals, paired tests
- ``corpus``/``report``/``cli``: corpus I/O, end-to-end evaluation documents,
  command line front end
"""

from __future__ import annotations

__version__ = "0.1.0"
