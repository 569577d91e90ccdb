from setuptools import setup, find_packages

setup(
    name="hpds-reduce",
    version="1.0.0",
    description="HOSVD-based model reduction of tensor homogeneous polynomial dynamical systems",
    packages=find_packages(exclude=["tests", "tests.*"]),
    py_modules=["main"],
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "joblib>=1.3",
        "python-dotenv>=1.0.0",
    ],
    extras_require={
        "test": ["pytest>=7.4"],
    },
    python_requires=">=3.9",
    entry_points={
        "console_scripts": [
            "hpds-reduce=main:main",
        ],
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
