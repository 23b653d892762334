length = len


class Widget:
    @staticmethod
    def still():
        return 0

    @classmethod
    def kind(cls):
        return cls.__name__

    def wobble(self):
        return 1
