"""
setup.py
====================
A Python script for packaging and distributing the 'detcov' tool.

This script defines the metadata and dependencies for the 'detcov' package.
"""

from setuptools import setup, find_packages

# Read the requirements from requirements.txt
with open("requirements.txt", "r", encoding="utf-8") as f:
    requirements = f.read().splitlines()

setup(
    name="detcov",
    version="1.0.0",
    description="Keypoint coverage measurement and detector combination for local feature detectors",
    packages=find_packages(exclude=["tests"]),
    python_requires=">=3.10",
    install_requires=requirements,  # Use the requirements list
    extras_require={"test": ["pytest>=8.0"]},
    entry_points={
        "console_scripts": [
            "detcov = detcov.main:main",
        ],
    },
    package_data={"detcov": ["report.template", "kb_default.json"]},
)
