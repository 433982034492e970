#!/usr/bin/env python
"""Setup script for intersubjectivity-bounds package."""

from setuptools import setup, find_packages

setup(
    name="intersubjectivity-bounds",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "examples*"]),
    python_requires=">=3.10",
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "click>=8.1.0",
        "rich>=13.0.0",
        "pydantic>=2.0.0",
        "pyyaml>=6.0",
    ],
    entry_points={
        "console_scripts": [
            "intersub=src.cli:main",
        ],
    },
)
