from setuptools import setup, find_packages
import io
import os
import re


here = os.path.abspath(os.path.dirname(__file__))


def read(*filenames, **kwargs):
    encoding = kwargs.get('encoding', 'utf-8')
    sep = kwargs.get('sep', '\n')
    buf = []
    for filename in filenames:
        with io.open(os.path.join(here, filename), encoding=encoding) as f:
            buf.append(f.read())
    return sep.join(buf)


def package_attribute(name):
    match = re.search(r"^__{}__ = '([^']*)'".format(name),
                      read('lectbench/__init__.py'), re.M)
    return match.group(1)


long_description = read('README.txt')


setup(
    name='lectbench',
    version=package_attribute('version'),
    license=package_attribute('license'),
    python_requires='>=3.8',
    install_requires=['numpy>=1.21',
                      'scipy>=1.7',
                      'scikit-learn>=1.0',
                      'requests>=2.25',
                      'urllib3>=1.26',
                      'loguru>=0.6',
                      'decorator>=4.0.11',
                      'tomli>=1.1; python_version < "3.11"'],
    tests_require=['pytest'],
    description='Pseudo-OOD contrastive training and energy-based OOD '
                'detection on text-attributed graphs',
    long_description=long_description,
    packages=find_packages(),
    include_package_data=True,
    platforms='any',
    entry_points={'console_scripts': ['lect=lectbench.cli:main']},
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Natural Language :: English',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3 :: Only',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
    ],
    extras_require={'testing': ['pytest', 'pytest-cov']}
)
