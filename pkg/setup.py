from setuptools import setup, find_packages

setup(
    name="miscluster",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    package_data={"miscluster": ["data/*.yaml"]},
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "pandas>=2.0.0",
        "scikit-learn>=1.3.0",
        "joblib>=1.3.0",
        "pydantic>=2.0.0",
        "pyyaml>=6.0",
        "click>=8.1.0",
        "rich>=13.0.0",
        "loguru>=0.7.0",
        "requests>=2.31.0",
    ],
    entry_points={
        "console_scripts": [
            "miscluster=miscluster.cli:main",
        ],
    },
    python_requires=">=3.9",
    description="Mutual Information Scoring clustering and cluster profiling for categorical data",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
)
