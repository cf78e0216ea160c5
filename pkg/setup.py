from setuptools import setup, find_packages

with open("README.rst", "r") as fh:
    long_description = fh.read()

setup(
    name="critbubble",
    version="0.3.0",
    description="Numerical experiments on bubbles of the critical Sobolev problem "
    "with a mixed local and nonlocal operator.",
    long_description=long_description,
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    package_data={"critbubble": ["goldens.json"]},
    python_requires=">=3.8",
    install_requires=[
        "click>=8.0",
        "click-plugins",
        "numpy",
        "scipy>=1.6",
        "mpmath",
        "pandas>=1.5",
        "matplotlib",
    ],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Environment :: Console",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
    ],
    entry_points={
        "console_scripts": ["critbubble = critbubble.cli:main"],
        "critbubble.plugins": [
            "constants = critbubble.plugins.constants:constants",
            "bubble = critbubble.plugins.bubble:bubble",
            "threshold = critbubble.plugins.threshold:threshold",
            "asymptotics = critbubble.plugins.asymptotics:asymptotics",
            "ledger = critbubble.plugins.ledger:ledger",
            "extract = critbubble.plugins.extract:extract",
            "verify = critbubble.plugins.verify:verify",
            "config = critbubble.plugins.config:config",
        ],
    },
)
