"""Flux crosstalk between tunable transmons: device model, virtual experiments,
crosstalk estimators and parametric-CZ fidelity under crosstalk."""

__version__ = "0.1.0"
