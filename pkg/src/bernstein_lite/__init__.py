__author__ = "Gavin Huttley"
__copyright__ = "Copyright 2024-, The bernstein lite project"
__credits__ = ["Gavin Huttley"]
__license__ = "BSD"
__version__ = "2024.6.1a1"
__maintainer__ = "Gavin Huttley"
__email__ = "Gavin.Huttley@anu.edu.au"
__status__ = "alpha"
