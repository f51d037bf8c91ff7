"""Setup script for Revealed-Preference BAI"""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="revealed-preference-bai",
    version="0.1.0",
    author="Revealed BAI Team",
    description="Best arm identification from an explorative user's revealed preferences",
    long_description=long_description,
    long_description_content_type="text/markdown",
    url="https://github.com/yourusername/revealed-bai",
    packages=find_packages(),
    package_data={"revealed_bai": ["tests/*.py"]},
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.22.0",
        "scipy>=1.8.0",
        "pandas>=1.5.0",
        "tqdm>=4.64.0",
        "pytest>=7.4.0",
        "python-dotenv>=1.0.0",
    ],
    extras_require={
        "dev": [
            "pytest-cov>=4.1.0",
            "black>=23.0.0",
            "flake8>=6.0.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "revealed-bai=revealed_bai.cli:main",
        ],
    },
)
