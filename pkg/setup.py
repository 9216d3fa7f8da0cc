"""Setup script for lrdpp-cli package."""

from setuptools import setup

# Configuration is in pyproject.toml
setup()
