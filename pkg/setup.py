from setuptools import setup
from setuptools import find_packages
import io


# get the dependencies and installs
with io.open('requirements.txt', encoding='utf-8') as f:
    all_reqs = f.read().split('\n')

install_requires = [x.strip() for x in all_reqs if x.strip() and 'git+' not in x]

# get readme
with io.open('comic2seed/readme.md') as f:
    readme = f.read()

setup(
    name='comic2seed',
    version='0.1.0',
    packages=find_packages(exclude=['test', 'examples', 'examples.*']),
    description="""Seed selection for complementary products
                under the Com-IC diffusion model""",
    license='MIT',
    package_data={
        "comic2seed": ["schema.yaml"],
    },
    include_package_data=True,
    classifiers=[
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3.6'
    ],
    python_requires=">=3.6",
    install_requires=install_requires,
    extras_require={
        'test': ['pytest'],
    },
    long_description=readme,
    long_description_content_type="text/markdown",
    entry_points="""
        [console_scripts]
        comic2seed=comic2seed.main:cli
    """,
)
