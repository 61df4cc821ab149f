from setuptools import setup

setup(name='tempered-plaplacian',
      version='0.1',
      description='Evaluate, simulate and verify the tempered fractional p-Laplacian '
                  'on the unit ball',
      license='MIT',
      packages=['tempered_plaplacian', 'tempered_plaplacian.diagnostics'],
      package_data={'tempered_plaplacian': ['presets/*.json']},
      include_package_data=True,
      scripts=['verifier.py'],
      install_requires=[
          'numpy',
          'scipy',
          'lxml',
          'inflection',
      ],
      extras_require={
          'test': ['pytest'],
      },
      zip_safe=False)
