from setuptools import setup, find_packages

setup(
    name="cooperative_cdma_mud",
    version="0.1.0",
    description="Greedy list-based multiuser detection and relay selection for cooperative DS-CDMA",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "numpy>=1.21.0",
        "scipy>=1.10.0",
        "pandas>=1.5.0",
        "click>=8.0.0",
        "joblib>=1.3.0",
        "tqdm>=4.60.0",
        "python-json-logger>=3.1.0",
    ],
    extras_require={
        "tests": ["pytest>=7.0.0"],
    },
    entry_points={
        "console_scripts": [
            "cdma-sim=src.cli:main",
        ],
    },
    python_requires=">=3.10",
)
