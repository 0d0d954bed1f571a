"""
r2d2: Android malware detection on colour images of classes.dex
Version: 0.1.0
"""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as f:
    long_description = f.read()

setup(
    name="r2d2-dex-images",
    version="0.1.0",
    description="Colour-image encoding of Android bytecode and a from-scratch CNN detector",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Security",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24",
        "Pillow>=10.0",
        "pydantic>=2.5.0",
        "pydantic-settings>=2.1.0",
        "python-dotenv>=1.0.0",
        "structlog>=24.1.0",
        "prometheus-client>=0.19.0",
        "typer>=0.9.0",
        "rich>=13.0",
    ],
    extras_require={
        "dev": ["pytest"],
    },
    entry_points={
        "console_scripts": ["r2d2=r2d2.cli.main:main"],
    },
)
