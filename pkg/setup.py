from setuptools import find_packages, setup

setup(
    name='edgebench',
    version='0.1.0',
    description='Canny threshold sweeps on coastline imagery scored with RMSE, PSNR, SSIM and FOM',
    packages=find_packages(exclude=['tests']),
    python_requires='>=3.10',
    install_requires=[
        'numpy>=1.26',
        'scipy>=1.11',
        'pandas>=2.2.2',
        'ply>=3.11',
        'configparser>=7.1.0',
    ],
    extras_require={
        'test': ['pytest>=8.1.1', 'hypothesis>=6.100'],
    },
    entry_points={
        'console_scripts': ['edgebench=edgebench.cli:main'],
    },
)
