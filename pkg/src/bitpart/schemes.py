from enum import Enum


class SchemeId(Enum):
    PERFECT_CSI = "perfect-csi"
    MFP_ADAPTIVE = "mfp-adaptive"
    MFP_EQUAL = "mfp-equal"
    AFP = "afp"


LIMITED_FEEDBACK_SCHEMES = (SchemeId.MFP_ADAPTIVE, SchemeId.MFP_EQUAL, SchemeId.AFP)
