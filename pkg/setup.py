# Always prefer setuptools over distutils
from setuptools import setup, find_packages

with open("Readme.md", "r") as fh:
    long_description = fh.read()

setup(
    name="lingan",
    version="0.1.0",
    author="lingan developers",
    description="Overparameterized linear GAN experiments with closed-form Gaussian metrics, based on PyTorch",
    long_description=long_description,
    long_description_content_type="text/markdown",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.7",
        "Programming Language :: Python :: 3.8",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.7",
    install_requires=['numpy','torch'],
    packages=find_packages(exclude=['contrib', 'docs', 'tests']),
    entry_points={"console_scripts": ["lingan=lingan.cli:main"]},
)
