namespace factorcop {}
