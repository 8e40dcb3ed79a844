"""Static analysis for voice-app skill packages.

Scans a skill source package (manifest, interaction model, back-end code)
and reports privacy violations, content-guideline breaches, over-privileged
permissions, and front-end/back-end inconsistencies before submission.
"""

__version__ = "0.1.0"

from skill_lint.report import AnalysisConfig, analyze

__all__ = ["AnalysisConfig", "analyze", "__version__"]
