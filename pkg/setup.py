import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()
setuptools.setup(
    name="adafe",
    version="0.1.0",
    description="An adaptive Gabor filterbank front-end for audio classification research.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests"]),
    package_data={
        "": ["LICENSE.txt", "THANKS.txt",],
        "adafe": ["frontend/presets/*.json"],
    },
    include_package_data=True,
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Programming Language :: Python",
        "License :: OSI Approved :: BSD License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.8",
    install_requires=[
        "numpy",
        "scipy",
        "pandas",
        "matplotlib",
        "soundfile",
        "typing_extensions",
        "scikit-learn",
    ],
    entry_points={"console_scripts": ["adafe=adafe.cli:run"]},
)
