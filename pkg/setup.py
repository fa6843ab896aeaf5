from setuptools import setup, find_packages

setup(
    name="smoothcert",
    version="1.0.0",
    description="Certified l2 radii for randomized smoothing with exponential Gaussian noise",
    author="smoothcert",
    packages=find_packages(),
    package_data={"smoothcert.tests": ["data/*.csv"]},
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.9",
        "statsmodels>=0.13",
        "PyYAML>=6.0",
    ],
    entry_points={
        "console_scripts": [
            "smoothcert=smoothcert.main:main",
        ],
    },
    python_requires=">=3.8",
)
