class FemError(Exception):
    pass


class MeshGenFailure(FemError):
    pass


class SingularSystem(FemError):
    pass
