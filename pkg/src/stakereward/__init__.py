"""Simulation toolkit for noise in multi-stakeholder LLM-judge rewards.

Submodules:

- ``noise_model``: holistic-judge noise, analytic and Monte Carlo variance terms
- ``calibration``: constraint difficulty and fixed softmax stakeholder weights
- ``judges``: synthetic judges for the direct, rubric, checklist and decomposed protocols
- ``metrics``: consistency and weight-drift statistics over score records
- ``grpo_signal``: group-relative gaps, SNR and advantage sign correctness
- ``variants``: rule-based presentation variants of structured plans
- ``experiment`` / ``cli``: batch runner and command line front end
"""

__version__ = "0.1.0"
