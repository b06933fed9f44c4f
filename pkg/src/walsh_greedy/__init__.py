"""walsh-greedy: Chrestenson transforms, greedy approximation and certified correction."""

__all__ = [
    "adic",
    "certificates",
    "chrestenson",
    "cli",
    "config",
    "dictionary",
    "driver",
    "errors",
    "formats",
    "greedy",
    "lemmas",
    "schemas",
    "suites",
    "verify",
]
