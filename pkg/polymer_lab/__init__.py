"""
Polymer lab: discrete and semi-discrete directed polymers in thin
rectangles, their Skorohod coupling, and the Fredholm-determinant route to
the GUE Tracy-Widom law.
"""

__version__ = "0.3.0"
