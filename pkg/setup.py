import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="dsc-panning",
    description="Loudspeaker calibration and object panning with direct sound compensation for "
                "non-equidistant loudspeaker layouts",
    long_description=long_description,
    long_description_content_type="text/markdown",
    version="0.1.0",
    packages=setuptools.find_packages(exclude=["tests"]),
    python_requires=">=3.8",
    install_requires=["numpy", "scipy", "matplotlib", "tqdm", "pandas", "soundfile"],
    entry_points={
        'console_scripts': [
            'dsc_panning = dsc_panning.__main__:main']
    }
)
