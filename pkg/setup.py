from setuptools import setup, find_packages

with open('README.md') as f:
    long_description = f.read()

with open('requirements.txt') as f:
    requirements = f.read().splitlines()

with open('extra_requirements.txt') as f:
    extra_requirements = f.read().splitlines()

setup(
    name='ael',
    version="0.1.0",
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Environment :: Console',
        'Intended Audience :: Developers',
        'Intended Audience :: Education',
        'Intended Audience :: Science/Research',
        'Natural Language :: English',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3.8',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
        'Topic :: Scientific/Engineering :: Image Recognition',
        'Topic :: Software Development :: Libraries',
    ],
    description='Adaptive equalization learning for semi-supervised '
                'segmentation on a synthetic long-tailed benchmark.',
    long_description=long_description,
    long_description_content_type='text/markdown',
    license='MIT',
    packages=find_packages(exclude=['tests', 'tests.*']),
    keywords=['semi-supervised', 'segmentation', 'long tail', 'pseudo labels',
              'mean teacher', 'cutmix', 'copy-paste'],
    install_requires=requirements,
    extras_require={
        'extras': extra_requirements,
    },
    entry_points={
        'console_scripts': ['ael = ael.cli:main'],
    },
)
