"""
Setuptools configuration for kernel_verify.
"""
from setuptools import setup, find_packages

setup(
    name="kernel_verify",
    version="0.1.0",
    description="Verification engine for an invariant kernel-function construction over Q",
    packages=find_packages(exclude=["tests", "tests.*"]),
    py_modules=["main"],
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "sympy>=1.12",
        "mpmath>=1.3",
    ],
    extras_require={
        "test": ["pytest>=7.3"],
    },
    entry_points={
        'console_scripts': [
            'kernel-verify=main:main',
        ],
    },
    python_requires=">=3.8",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
)
