"""Multi-disease prediction toolkit.

Classical ensembles over tabular clinical records (diabetes, heart
disease) and from-scratch convolutional networks over medical images
(lung histopathology, brain MRI), with a shared HTTP prediction service
and a command-line front end.
"""

__version__ = "0.1.0"
