from setuptools import setup, find_packages
setup(
    name = "rams",
    version = "0.1",
    description = 'Reconfigurable antenna mmWave MIMO throughput simulator',
    packages = find_packages(),
    install_requires = ['numpy', 'scipy', 'astropy', 'pyyaml'],
    extras_require = {'test': ['pytest', 'hypothesis']},
    entry_points = {'console_scripts': ['rams = rams.cli:main']},
    )
