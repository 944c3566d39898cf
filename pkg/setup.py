from setuptools import setup
setup(name='rustico',
      version='0.1.0',
      description='"delineation of curvilinear structures with push-pull inhibited COSFIRE filters"',
      license='MIT',
      packages=['rustico', 'rustico.common', 'rustico.pytorch', 'rustico.filters', 'rustico.evaluation'],
      install_requires=['numpy', 'scipy', 'torch', 'Pillow', 'scikit-image', 'pathlib2', 'tqdm'],
      extras_require={'test': ['pytest', 'hypothesis']},
      entry_points={
        'console_scripts': [
                'rustico= rustico:main'],
    },
      zip_safe=False)
