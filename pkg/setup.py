from setuptools import setup, find_packages

setup(
    name="chainlab",
    version="0.1.0",
    description="chainlab - Finite-horizon certificates and theorem cross-checks for linear consensus dynamics",
    author="chainlab contributors",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    py_modules=["main"],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.22",     # Matrices, products, trajectories
        "scipy>=1.8",      # Quadrature for the flocking condition
        "networkx>=2.8",   # Interaction graphs, islands, clustering
    ],
    entry_points={
        'console_scripts': [
            'chainlab=main:cli',
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Operating System :: OS Independent",
    ],
)
